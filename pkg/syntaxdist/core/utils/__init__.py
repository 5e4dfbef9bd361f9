from .parallel import thread_map
from .seeding import derive_rng, derive_seed

__all__ = ["derive_rng", "derive_seed", "thread_map"]
