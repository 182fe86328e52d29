"""
Utility modules for the unfitted ROM toolkit
"""
