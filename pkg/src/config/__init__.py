"""Configuration module for qgm"""

from .config import ConfigManager, config, get_config, tolerance

__all__ = [
    'ConfigManager',
    'config',
    'get_config',
    'tolerance',
]
