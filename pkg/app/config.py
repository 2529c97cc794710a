import os


class Config:
    """Configuración base para la aplicación."""
    DEBUG = os.environ.get('FLASK_DEBUG', 'False').lower() == 'true'
    LOG_LEVEL = os.environ.get('ISOTREES_LOG_LEVEL', 'WARNING')

    # Series truncadas y aritmética real
    SERIES_ORDER = 64
    NESTED_DEGREE = 40
    REAL_PRECISION_BITS = int(os.environ.get('ISOTREES_PRECISION_BITS', '192'))

    # Diferencias finitas para las constantes del TLC
    FD_STEP = 1e-3

    # Techos de enumeración exacta
    ENUMERATION_CEILING = 18
    RESTRICTED_ENUMERATION_CEILING = 21

    # Monte Carlo
    MC_BLOCK_SIZE = 10_000
    MC_WORKERS = int(os.environ.get('ISOTREES_WORKERS', '1'))


class DevelopmentConfig(Config):
    """Configuración para desarrollo."""
    DEBUG = True
    LOG_LEVEL = 'INFO'


class ProductionConfig(Config):
    """Configuración para producción."""
    DEBUG = False


class TestingConfig(Config):
    """Configuración para pruebas."""
    TESTING = True
    DEBUG = True
    MC_BLOCK_SIZE = 2_000


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': ProductionConfig
}
