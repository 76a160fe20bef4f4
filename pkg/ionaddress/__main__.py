import sys

from ionaddress.cli import main

sys.exit(main())
