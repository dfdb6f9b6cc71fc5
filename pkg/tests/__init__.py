"""
Unit tests for the undersmoothed HAL toolkit.

This package contains tests for:
- hal: Basis enumeration, losses, and the lasso solver
- selection: Cross-validation and undersmoothing rules
- targets: ATE and squared-density estimators
- sim: Data-generating processes, Monte Carlo runs, and reports
- ConfigManager / ProcessManager: Run configuration and worker pools
"""
