from . import manifestDto
from . import resultsDto
