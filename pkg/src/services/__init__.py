from .runner import RunConfig, run, load_data, EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED

__all__ = ["RunConfig", "run", "load_data", "EXIT_OK", "EXIT_INVALID", "EXIT_NOT_CONVERGED"]
