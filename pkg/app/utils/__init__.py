# Validadores y serialización de reportes
