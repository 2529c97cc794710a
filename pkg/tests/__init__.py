# Pruebas de servicios y comandos
