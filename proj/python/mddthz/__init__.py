"""Python access to the mddthz simulator.

>>> import mddthz
>>> res = mddthz.run({"trials": 2, "schemes": ["TTW", "STW"]})
>>> res["schemes"]["TTW"]["cdf"]["median"]
"""

from ._core import cdf, default_config, path_gain_db, run, schemes, tdd_fractions, version

__all__ = ["cdf", "default_config", "path_gain_db", "run", "schemes", "tdd_fractions", "version"]
__version__ = version()
