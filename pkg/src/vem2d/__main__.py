import sys

from vem2d.cli import main

sys.exit(main())
