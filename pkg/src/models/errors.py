"""
Error hierarchy for ctlab

Every failure carries a machine name and the process exit status the CLI
reports for it: 2 for bad input, 3 for budget or numerical failures.
"""

from typing import Dict, Optional


class CtlabError(Exception):
    """Base class for all ctlab failures"""

    code = 'ctlab_error'
    exit_status = 1

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict:
        """Machine-readable error envelope"""
        return {
            'success': False,
            'error': {
                'code': self.code,
                'type': type(self).__name__,
                'message': self.message,
                'exit_status': self.exit_status,
                'details': self.details,
            },
        }


# ============================================================================
# VALIDATION ERRORS (exit 2)
# ============================================================================

class ValidationError(CtlabError):
    code = 'validation_error'
    exit_status = 2


class DisconnectedGraph(ValidationError):
    code = 'disconnected_graph'


class NonPositiveWeight(ValidationError):
    code = 'non_positive_weight'


class SelfLoop(ValidationError):
    code = 'self_loop'


class DuplicateEdge(ValidationError):
    code = 'duplicate_edge'


class InvalidVertex(ValidationError):
    code = 'invalid_vertex'


class MalformedFile(ValidationError):
    code = 'malformed_file'


class IoFailure(ValidationError):
    code = 'io_failure'


class InvalidParameters(ValidationError):
    code = 'invalid_parameters'


class NotCritical(InvalidParameters):
    code = 'not_critical'


class EmptyGraph(ValidationError):
    code = 'empty_graph'


class NotACutset(ValidationError):
    code = 'not_a_cutset'


class OverlappingCutsets(ValidationError):
    code = 'overlapping_cutsets'


class TooFewCenters(ValidationError):
    code = 'too_few_centers'


class DegenerateField(ValidationError):
    code = 'degenerate_field'


class InsufficientData(ValidationError):
    code = 'insufficient_data'


class ConfigError(ValidationError):
    code = 'config_error'


# ============================================================================
# COMPUTATION ERRORS (exit 3)
# ============================================================================

class ComputationError(CtlabError):
    code = 'computation_error'
    exit_status = 3


class BudgetExceeded(ComputationError):
    code = 'budget_exceeded'


class NumericalFailure(ComputationError):
    code = 'numerical_failure'


class RejectionBudgetExceeded(ComputationError):
    code = 'rejection_budget_exceeded'


class StepBudgetExceeded(ComputationError):
    code = 'step_budget_exceeded'


class CriteriaFailed(ComputationError):
    code = 'criteria_failed'
