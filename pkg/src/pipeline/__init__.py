"""
Pipeline stages behind run_pipeline.py
"""

from src.pipeline.commands import cmd_benchmark, cmd_convergence, cmd_offline, cmd_online, cmd_pod

__all__ = ['cmd_benchmark', 'cmd_convergence', 'cmd_offline', 'cmd_online', 'cmd_pod']
