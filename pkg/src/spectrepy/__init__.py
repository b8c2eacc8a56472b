from .graphs import *
from .centrality import *
from .alignment import *
from .metrics import *
from .datagen import *
from .cli import RunConfig, cmd_align, cmd_generate, cmd_evaluate, cmd_sweep, cmd_runtime
