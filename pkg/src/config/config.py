"""
Configuration manager for qgm
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict

import yaml

logger = logging.getLogger(__name__)


class ConfigManager:
    """Manages tolerances, seeds and run settings"""

    _instance = None
    _config: Dict[str, Any] = {}

    def __new__(cls):
        """Singleton pattern"""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._load_config()
        return cls._instance

    def _load_config(self) -> None:
        """Load configuration from YAML file, then apply environment overrides"""
        config_path = Path(__file__).parent / "config.yaml"

        if not config_path.exists():
            logger.warning("Config file not found at %s, using defaults", config_path)
            self._config = self._get_defaults()
        else:
            try:
                with open(config_path, 'r', encoding='utf-8') as f:
                    loaded = yaml.safe_load(f) or {}
                self._config = _merge(self._get_defaults(), loaded)
            except (OSError, yaml.YAMLError) as e:
                logger.error("Error loading config %s: %s", config_path, e)
                self._config = self._get_defaults()

        self._apply_environment()

    def _apply_environment(self) -> None:
        seed = os.environ.get('QGM_SEED')
        if seed is not None and seed.strip():
            try:
                self._config['sampling']['default_seed'] = int(seed)
            except ValueError:
                logger.warning("Ignoring non-integer QGM_SEED=%r", seed)
        level = os.environ.get('QGM_LOG_LEVEL')
        if level:
            self._config['logging']['level'] = level.upper()

    @staticmethod
    def _get_defaults() -> Dict[str, Any]:
        """Get default configuration"""
        return {
            'app': {
                'name': 'qgm',
                'version': '1.0.0',
            },
            'matcore': {
                'psd_tol': 1e-9,
                'symmetry_tol': 1e-12,
                'eig_method': 'eigh',
                'jacobi_tol': 1e-14,
                'jacobi_max_sweeps': 64,
                'max_dim': 64,
            },
            'entropy': {
                'zero_clamp': 1e-12,
                'support_tol': 1e-9,
            },
            'pauli': {
                'brute_force_max_qubits': 6,
            },
            'sampling': {
                'default_seed': 0,
                'low': -1.0,
                'high': 1.0,
                'commutator_tol': 1e-10,
                'marginal_tol': 1e-8,
                'max_resample': 20,
                'threads': 1,
            },
            'dimension': {
                'fd_step': 1e-6,
                'rank_rtol': 1e-7,
                'retries': 3,
            },
            'implicit': {
                'tol': 1e-8,
                'gap_ratio': 10.0,
                'holdout_fraction': 0.2,
                'oversample': 1.2,
                'holdout_threshold': 1e-6,
            },
            'toric': {
                'max_columns': 32,
                'max_degree': 4,
                'verify_degree': True,
            },
            'projection': {
                'tol': 1e-11,
                'max_iter': 100,
                'armijo': 1e-4,
                'certificate_slack': 1e-7,
                'n_probe': 20,
                'restarts': 5,
                'ips_tol': 1e-10,
                'ips_max_iter': 10000,
            },
            'export': {
                'default_format': 'json',
                'csv_encoding': 'utf-8',
                'float_precision': 17,
            },
            'logging': {
                'level': 'WARNING',
                'format': '%(asctime)s %(name)s %(levelname)s: %(message)s',
            },
        }

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation.

        Example: config.get('projection.tol')
        """
        keys = key.split('.')
        value = self._config

        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default

            if value is None:
                return default

        return value if value is not None else default

    def set(self, key: str, value: Any) -> None:
        """Override a value for the rest of the process"""
        keys = key.split('.')
        node = self._config
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging configuration"""
        return self._config.get('logging', {})

    def reload(self) -> None:
        """Reload configuration from file"""
        self._load_config()

    def snapshot(self) -> Dict[str, Any]:
        """Deep copy of the active configuration"""
        return copy.deepcopy(self._config)


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


# Global config instance
config = ConfigManager()


def get_config() -> ConfigManager:
    """Get global config instance"""
    return config


def tolerance(key: str, value: Any = None) -> Any:
    """Return ``value`` if given, otherwise the configured default for ``key``"""
    return config.get(key) if value is None else value
