import sys

from mesinar.cli import main

sys.exit(main())
