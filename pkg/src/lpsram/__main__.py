import sys

from lpsram.cli import main

sys.exit(main())
