import sys

from wbfmap.cli import main

sys.exit(main())
