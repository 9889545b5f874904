import sys

from hydrodeep.cli.main import main

sys.exit(main())
