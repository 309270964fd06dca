import os
from wstate_lab.settings.base import *

DEBUG = True

# Verbose output only on request: the simulator logs from inner loops.
if os.getenv("LINOPT_DEBUG", "False") == "True":
    LOGGING['loggers']['linopt']['level'] = 'DEBUG'
