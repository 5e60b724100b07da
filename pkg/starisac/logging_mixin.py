import time
from .logger import logger
from .validation import ValidationUtils


class LoggingMixin:
    def log_solve_start(self, variant: str, n_ris: int, n_users: int, n_targets: int, seed=None):
        logger.info(f"Solving {variant} with N_S={n_ris}, K={n_users}, L={n_targets}",
                    extra={"variant": variant, "seed": seed})
        return time.perf_counter()

    def log_solve_end(self, variant: str, start_time: float, assr_nats: float, converged: bool, seed=None):
        elapsed = time.perf_counter() - start_time
        status = "converged" if converged else "NOT converged"
        logger.info(f"{variant} solve {status} in {elapsed:.2f} seconds, "
                    f"ASSR {assr_nats:.4f} nats/s/Hz",
                    extra={"variant": variant, "seed": seed})

    def log_outer_update(self, outer: int, rho: float, nu, residuals):
        logger.info(f"Outer update {outer}: rho={rho:.3e}, nu={list(map(float, nu))}, "
                    f"max |G|={max(map(abs, residuals), default=0.0):.3e}",
                    extra={"outer": outer})

    def log_inner_summary(self, outer: int, iterations: int, augmented: float, true_objective: float,
                          converged: bool):
        if converged:
            logger.debug(f"Inner solve finished after {iterations} iteration(s): "
                         f"augmented={augmented:.6f}, true={true_objective:.6f}",
                         extra={"outer": outer})
        else:
            logger.warning(f"Inner solve hit its iteration cap ({iterations}): "
                           f"augmented={augmented:.6f}, true={true_objective:.6f}",
                           extra={"outer": outer})

    def log_variant_init(self, variant: str, updates_profile: bool):
        logger.info(f"Initialized {variant} variant (profile updates: {updates_profile})")

    def log_contract_event(self, event_type: str, details: dict):
        """Log contract violations with structured details."""
        ValidationUtils.log_contract_event(event_type, details)
