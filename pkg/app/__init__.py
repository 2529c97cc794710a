import logging

from flask import Flask

from .config import config


def create_app(config_name='default'):
    """Factory function para crear la aplicación Flask con los comandos de línea."""
    app = Flask(__name__)
    app.config.from_object(config[config_name])

    level = getattr(logging, str(app.config['LOG_LEVEL']).upper(), logging.WARNING)
    app.logger.setLevel(level)
    logging.getLogger('app').setLevel(level)

    # Registrar blueprints de comandos
    from .commands.exact import bp as exact_bp
    from .commands.series import bp as series_bp
    from .commands.mc import bp as mc_bp
    from .commands.asym import bp as asym_bp
    from .commands.experiments import bp as experiments_bp

    app.register_blueprint(exact_bp)
    app.register_blueprint(series_bp)
    app.register_blueprint(mc_bp)
    app.register_blueprint(asym_bp)
    app.register_blueprint(experiments_bp)

    return app
