"""fairrobust: train and audit classifiers that stay fair under
adversarial reweightings of the training sample."""

__version__ = "0.1.0"
