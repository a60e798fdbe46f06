# "dev" marks a checkout build; CUTQUAD_REVISION overrides it at run time.
__version__ = "0.1.0"
REVISION = "dev"
