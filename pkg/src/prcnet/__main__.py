import sys

from prcnet.cli import main

sys.exit(main())
