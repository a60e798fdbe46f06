import sys

from cutquad.cli import main

sys.exit(main())
