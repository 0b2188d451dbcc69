from ._ddpc import *  # noqa: F401,F403
from ._ddpc import __doc__  # noqa: F401
