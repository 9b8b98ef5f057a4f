import sys

from realm_tta.cli import main

sys.exit(main())
