"""Execution-cost prediction for MiniImp programs via instrumentation, sparse polynomial models and slicing."""
