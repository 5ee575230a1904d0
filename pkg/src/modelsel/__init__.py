"""Model selection and ensemble learning: risk estimation, cross validation,
linear smoothers, ridge and lasso, bagging and AdaBoost."""

from . import crossval, dataset, ensemble, regularize, risk, smoothers

__all__ = ["crossval", "dataset", "ensemble", "regularize", "risk", "smoothers"]
__version__ = "0.1.0"
