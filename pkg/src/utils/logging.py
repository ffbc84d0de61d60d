"""
Logging and monitoring utilities for the verification engine.
"""

import logging
import logging.handlers
import os
import traceback
from datetime import datetime, timedelta
from functools import wraps

ROOT_LOGGER = 'mbh'
_PACKAGE_LOGGERS = ('algorithms', 'models', 'verification_engine', 'sample_data', 'cli', ROOT_LOGGER)


def setup_logging(log_dir='logs', level=logging.INFO, console=False):
    """Setup engine logging.

    File handlers always write ``engine.log`` and ``errors.log``; the console
    handler goes to stderr and is only installed when ``console`` is set, so
    machine-readable output on stdout stays clean.
    """
    os.makedirs(log_dir, exist_ok=True)

    detailed_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s - [%(filename)s:%(lineno)d]'
    )
    simple_formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s'
    )

    file_handler = logging.handlers.RotatingFileHandler(
        os.path.join(log_dir, 'engine.log'),
        maxBytes=10485760,  # 10MB
        backupCount=5
    )
    file_handler.setFormatter(detailed_formatter)
    file_handler.setLevel(level)

    error_handler = logging.handlers.RotatingFileHandler(
        os.path.join(log_dir, 'errors.log'),
        maxBytes=10485760,  # 10MB
        backupCount=5
    )
    error_handler.setFormatter(detailed_formatter)
    error_handler.setLevel(logging.ERROR)

    handlers = [file_handler, error_handler]
    if console:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(simple_formatter)
        console_handler.setLevel(level)
        handlers.append(console_handler)

    for name in _PACKAGE_LOGGERS:
        logger = logging.getLogger(name)
        for handler in list(logger.handlers):
            if getattr(handler, '_mbh_handler', False):
                logger.removeHandler(handler)
                handler.close()
        for handler in handlers:
            handler._mbh_handler = True
            logger.addHandler(handler)
        logger.setLevel(level)
        logger.propagate = False

    logging.getLogger(ROOT_LOGGER).info(f"Logging configured - directory: {log_dir}")
    return logging.getLogger(ROOT_LOGGER)


def log_performance(func):
    """Decorator to log function performance."""
    logger = logging.getLogger(func.__module__)

    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = datetime.utcnow()
        try:
            result = func(*args, **kwargs)
            duration = (datetime.utcnow() - start_time).total_seconds()

            performance_monitor.record_metric(f'{func.__name__}_duration', duration)
            logger.info(
                f"Performance: {func.__name__} executed in {duration:.3f}s",
                extra={'extra_data': {
                    'function': func.__name__,
                    'duration_seconds': duration,
                    'args_count': len(args),
                    'kwargs_count': len(kwargs)
                }}
            )
            return result
        except Exception as e:
            duration = (datetime.utcnow() - start_time).total_seconds()

            logger.error(
                f"Performance Error: {func.__name__} failed after {duration:.3f}s - {str(e)}",
                extra={'extra_data': {
                    'function': func.__name__,
                    'duration_seconds': duration,
                    'error': str(e),
                    'traceback': traceback.format_exc()
                }}
            )
            raise
    return wrapper


class PerformanceMonitor:
    """Counters and timings for integrations, shots and refinements."""

    def __init__(self, history=1000):
        self.history = history
        self.metrics = {}
        self.totals = {}

    def record_metric(self, name, value, tags=None):
        """Record a performance metric."""
        if name not in self.metrics:
            self.metrics[name] = []
        self.totals[name] = self.totals.get(name, 0) + value

        self.metrics[name].append({
            'value': value,
            'timestamp': datetime.utcnow(),
            'tags': tags or {}
        })

        if len(self.metrics[name]) > self.history:
            self.metrics[name] = self.metrics[name][-self.history:]

    def get_metric_summary(self, name, minutes=60):
        """Get summary statistics for a metric."""
        if name not in self.metrics:
            return None

        cutoff_time = datetime.utcnow() - timedelta(minutes=minutes)
        recent_entries = [
            entry for entry in self.metrics[name]
            if entry['timestamp'] > cutoff_time
        ]

        if not recent_entries:
            return None

        values = [entry['value'] for entry in recent_entries]

        return {
            'count': len(values),
            'total': sum(values),
            'min': min(values),
            'max': max(values),
            'avg': sum(values) / len(values),
            'latest': values[-1]
        }

    def total(self, name):
        """Sum of every value recorded under name, unaffected by the history window."""
        return self.totals.get(name, 0)

    def reset(self):
        self.metrics = {}
        self.totals = {}


# Global performance monitor instance
performance_monitor = PerformanceMonitor()
