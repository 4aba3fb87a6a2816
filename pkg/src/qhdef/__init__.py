"""Quasi-Hamiltonian spaces, their Hamiltonian limits, and numerical axiom checks."""
from .liegroup import DomainError, GroupModel, MembershipError, get_model
from .axioms import CheckConfig, SignConvention, check_family, check_ham, check_qh

__all__ = [
    "CheckConfig",
    "DomainError",
    "GroupModel",
    "MembershipError",
    "SignConvention",
    "check_family",
    "check_ham",
    "check_qh",
    "get_model",
]
