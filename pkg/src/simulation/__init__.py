from .simulator import SimulationPlan, SimulatedData, simulate

__all__ = ["SimulationPlan", "SimulatedData", "simulate"]
