import sys

from cotrain.main import main

sys.exit(main())
