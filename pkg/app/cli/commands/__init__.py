from . import cells
from . import deodhar
from . import fibre
from . import verify
