import logging
import os

import pytest

from utils.logging import PerformanceMonitor, log_performance, setup_logging


def test_setup_logging_writes_engine_log(tmp_path):
    setup_logging(str(tmp_path), level=logging.DEBUG)
    logging.getLogger('algorithms.homology').info("complex built")
    for handler in logging.getLogger('algorithms').handlers:
        handler.flush()
    with open(os.path.join(tmp_path, 'engine.log'), encoding='utf-8') as handle:
        assert "complex built" in handle.read()
    assert os.path.exists(os.path.join(tmp_path, 'errors.log'))


def test_setup_logging_does_not_stack_handlers(tmp_path):
    setup_logging(str(tmp_path))
    setup_logging(str(tmp_path))
    marked = [h for h in logging.getLogger('cli').handlers if getattr(h, '_mbh_handler', False)]
    assert len(marked) == 2


def test_performance_monitor_summary():
    monitor = PerformanceMonitor(history=3)
    for value in (1.0, 2.0, 3.0, 4.0):
        monitor.record_metric('shots', value)
    summary = monitor.get_metric_summary('shots')
    assert summary['count'] == 3
    assert summary['min'] == 2.0 and summary['latest'] == 4.0
    assert monitor.get_metric_summary('missing') is None
    assert monitor.total('shots') == 10.0
    assert monitor.total('missing') == 0
    monitor.reset()
    assert monitor.get_metric_summary('shots') is None
    assert monitor.total('shots') == 0


def test_log_performance_passes_results_and_errors():
    @log_performance
    def square(x):
        return x * x

    @log_performance
    def broken():
        raise RuntimeError("boom")

    assert square(3) == 9
    with pytest.raises(RuntimeError):
        broken()
