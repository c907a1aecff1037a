import sys

from pysgld.cli import main

sys.exit(main())
