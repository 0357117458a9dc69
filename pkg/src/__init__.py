# lcirt - latent-class item response models
__version__ = "0.1.0"
