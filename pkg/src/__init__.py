# Ultrametric Toolkit
