import sys

from relaysec.cli import main

sys.exit(main())
