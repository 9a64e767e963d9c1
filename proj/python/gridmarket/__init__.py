from ._gridmarket import *  # noqa: F401,F403
