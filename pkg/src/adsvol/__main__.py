import sys

from adsvol.cli import main

sys.exit(main())
