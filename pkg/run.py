import os

from flask.cli import FlaskGroup

from app import create_app


def _create_app():
    return create_app(os.environ.get('FLASK_CONFIG', 'production'))


# Grupo de comandos usando el factory pattern: python run.py exact --n 3
cli = FlaskGroup(create_app=_create_app, add_default_commands=False)

if __name__ == '__main__':
    cli()
