"""
Linear algebra kernel: sparse solves, dense symmetric eigensolver, URM1 matrix files
"""
