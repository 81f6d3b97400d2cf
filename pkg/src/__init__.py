"""ctlab: cover times of random walks on weighted random graphs"""

__version__ = '1.0.0'
