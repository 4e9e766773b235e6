import os
from dotenv import load_dotenv

load_dotenv()


def _env_float(name, default):
    return float(os.getenv(name, default))


def _env_int(name, default):
    return int(os.getenv(name, default))


class Config:
    """Base configuration."""
    # Monotone iteration
    SOLVER_TOL = _env_float('VPCONFINE_TOL', 1e-8)
    SOLVER_MAX_ITER = _env_int('VPCONFINE_MAX_ITER', 500)
    K_SAFETY = _env_float('VPCONFINE_K_SAFETY', 1.5)

    # Velocity-space quadrature
    QUAD_ORDER = _env_int('VPCONFINE_QUAD_ORDER', 8)
    QUAD_SUBDIVISIONS = _env_int('VPCONFINE_QUAD_SUBDIVISIONS', 8)

    # Grid and linear algebra
    GRID_NX = _env_int('VPCONFINE_GRID_NX', 64)
    GRID_NZ = _env_int('VPCONFINE_GRID_NZ', 64)
    DIRECT_SOLVER_LIMIT = _env_int('VPCONFINE_DIRECT_SOLVER_LIMIT', 256 * 256)
    KRYLOV_MAXITER = _env_int('VPCONFINE_KRYLOV_MAXITER', 5000)

    # Concurrency for density sweeps and lambda sweeps
    MAX_WORKERS = _env_int('VPCONFINE_MAX_WORKERS', 1)

    OUTPUT_DIR = os.getenv('VPCONFINE_OUTPUT_DIR', 'out')
    LOG_FORMAT = os.getenv(
        'VPCONFINE_LOG_FORMAT', '%(asctime)s %(levelname)s [%(name)s] %(message)s'
    )


class DevelopmentConfig(Config):
    """Development configuration."""
    LOG_LEVEL = os.getenv('VPCONFINE_LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    """Production configuration."""
    LOG_LEVEL = os.getenv('VPCONFINE_LOG_LEVEL', 'INFO')
    MAX_WORKERS = _env_int('VPCONFINE_MAX_WORKERS', os.cpu_count() or 1)


class TestingConfig(Config):
    """Testing configuration."""
    LOG_LEVEL = 'WARNING'
    QUAD_ORDER = 4
    QUAD_SUBDIVISIONS = 4
    GRID_NX = 24
    GRID_NZ = 24
    MAX_WORKERS = 1


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}
