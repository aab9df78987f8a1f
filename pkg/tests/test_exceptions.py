from unittest import TestCase

from priority_mm1 import exceptions


class ExceptionTest(TestCase):
    def test_hierarchy(self):
        self.assertTrue(issubclass(exceptions.StabilityError, exceptions.ParameterError))
        self.assertTrue(issubclass(exceptions.DomainError, ValueError))
        for cls in (
            exceptions.ConfigurationError,
            exceptions.TruncationError,
            exceptions.SolverError,
            exceptions.EngineError,
            exceptions.FieldError,
        ):
            self.assertTrue(issubclass(cls, exceptions.QueueingError), cls)

    def test_stability_error(self):
        error = exceptions.StabilityError(1.25)
        self.assertEqual(
            "unstable system: rho = 1.25 (stationary analysis needs rho < 1)", str(error)
        )
        self.assertEqual(1.25, error.rho)

    def test_stability_error_with_operation(self):
        self.assertTrue(str(exceptions.StabilityError(1.0, "pgf_F1")).startswith("pgf_F1: "))

    def test_truncation_error(self):
        error = exceptions.TruncationError("budget exceeded", tail_mass=2e-9, n1_max=64, n2_max=128)
        self.assertEqual("budget exceeded (tail_mass=2e-09, caps=64x128)", str(error))
        self.assertEqual("budget exceeded", str(exceptions.TruncationError("budget exceeded")))

    def test_solver_error(self):
        error = exceptions.SolverError("did not converge", {"method": "power", "states": 10})
        self.assertEqual("did not converge [method=power, states=10]", str(error))
        self.assertEqual({}, exceptions.SolverError("x").diagnostics)

    def test_engine_error(self):
        inner = exceptions.SolverError("singular")
        error = exceptions.EngineError(inner, engine="ctmc", params="lambda1=1, lambda2=1, mu=4")
        self.assertEqual("ctmc: singular (lambda1=1, lambda2=1, mu=4)", str(error))
        self.assertEqual("singular", str(exceptions.EngineError(inner)))
