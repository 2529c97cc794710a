# Modelos de series, árboles, muestreo y constantes asintóticas
