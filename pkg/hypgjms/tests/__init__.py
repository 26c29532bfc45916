"""
hypgjms Test Suite
==================

Tests for every toolkit module against closed forms and multiprecision oracles.

Test Modules:
    - test_validation: Validators, exception hierarchy and exit codes
    - test_hgeom: Ball and hyperboloid models, law of cosines, volumes
    - test_specfun: Gauss 2F1 and Gamma ratios against mpmath
    - test_quadrature: Gauss-Legendre rules and graded breakpoints
    - test_kelvin: Inversion map, Jacobians and the Kelvin transform
    - test_gjms: Operator routes and conformal covariance
    - test_green: Green's function, its bound and kernel identities
    - test_shoot: Shooting outcomes, bubbles and the separatrix
    - test_classify: Solution family residuals and power fits
    - test_hls: Sharp constant and the inequality on the test family
    - test_msphere: Moving-sphere scans and charges
    - test_cli: Commands, manifests and exit codes
    - test_integration: Cross-module checks
"""
