"""
Snapshot lifecycle: sampling, sweeps, extension, transport, persistence
"""
