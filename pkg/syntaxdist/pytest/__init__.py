from .corpora import *
from .registry import *
