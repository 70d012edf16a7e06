"""
Configuration management for VolStrike
"""

from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application configuration (environment variables prefixed VOLSTRIKE_, or .env)"""

    model_config = SettingsConfigDict(
        env_prefix='VOLSTRIKE_',
        env_file='.env',
        env_file_encoding='utf-8',
        extra='ignore',
    )

    # Logging
    log_level: str = 'INFO'

    # Affine ODE solver (embedded Runge-Kutta 4/5)
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-12

    # Frequency quadrature for the discrete strike
    omega_max: Optional[float] = None  # None: scaled to the sampling interval
    omega_min: float = 1e-8
    freq_rtol: float = 1e-8
    panel_nodes: int = 16

    # Laplace/time quadrature for the continuous strike
    laplace_rtol: float = 1e-11
    time_nodes: int = 64

    # Monte Carlo
    default_seed: int = 20190101
    default_paths: int = 20000
    steps_per_interval: int = 10
    chunk_paths: int = 8192
    workers: int = 1

    # Alternative jump conventions
    product_transform: bool = False
    simple_return_jump: bool = False

    @classmethod
    def from_env(cls) -> 'Settings':
        """Create settings from environment variables"""
        return cls()


# Global settings instance
settings = Settings.from_env()
