"""Pool-based active learning on contaminated unlabeled pools.

Subpackages and modules:

* :mod:`alforge.core` -- domain types, pool bookkeeping, dataset format
* :mod:`alforge.learner` -- representation model, losses, training loops
* :mod:`alforge.clustering` -- k-means over the representation space
* :mod:`alforge.acquisition` -- the five acquisition strategies
* :mod:`alforge.benchgen` -- synthetic benchmark construction
* :mod:`alforge.driver` -- simulated oracle and the stage loop
* :mod:`alforge.cli` -- command-line interface
* :mod:`alforge.kernels` -- numba/numpy hot kernels (``ALFORGE_BACKEND``)
"""

__version__ = "0.1.0"
