"""
Output Schema Module
====================
Column schemas and validation rules for every CSV table the CLI writes.
"""

from .csv_schemas import OutputEngine, OutputSchema

__all__ = ['OutputEngine', 'OutputSchema']
