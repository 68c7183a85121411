# Tests package for Ultrametric Toolkit
