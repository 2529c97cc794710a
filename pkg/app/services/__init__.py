# Servicios de enumeración, series, muestreo y asintótica
