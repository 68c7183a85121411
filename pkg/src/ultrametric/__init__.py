# Ultrametric Package
