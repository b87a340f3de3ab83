"""Static gas bounds and storage-caching optimization for EVM bytecode."""

__version__ = "0.1.0"
