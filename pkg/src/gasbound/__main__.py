import sys

from gasbound.cli import main

sys.exit(main())
