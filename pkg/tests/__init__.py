from .test_graphs import *
from .test_centrality import *
from .test_alignment import *
from .test_metrics import *
from .test_datagen import *
from .test_cli import *
