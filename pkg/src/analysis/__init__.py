"""
Evaluation of reduced models and full-order convergence studies
"""
