import functools
import logging
import numbers
import os

can_use_open_telemetry = False
try:
    from opentelemetry import trace
    from opentelemetry.sdk.trace import TracerProvider
    from opentelemetry.sdk.trace.export import ConsoleSpanExporter, SimpleSpanProcessor

    tracer_provider = TracerProvider()
    trace.set_tracer_provider(tracer_provider)
    can_use_open_telemetry = True
except:
    logging.warning("Unable to import opentelemetry to trace functions", exc_info=True)

TRACE_CONSOLE_VARIABLE = "TMASIM_TRACE_CONSOLE"


class Tracing:
    @staticmethod
    def configure_tracing():
        """Call after the environment is loaded so TMASIM_TRACE_CONSOLE from .env is honoured"""
        if can_use_open_telemetry and os.environ.get(TRACE_CONSOLE_VARIABLE) == "1":
            tracer_provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter()))

    @staticmethod
    def _span_attributes(kwargs: dict) -> dict:
        # OpenTelemetry attributes must be str, bool, int or float; numpy scalars are unwrapped, arrays skipped
        attributes = {}
        for name, value in kwargs.items():
            if isinstance(value, (str, bool, numbers.Real)) and getattr(value, "ndim", 0) == 0:
                attributes[f"tma.{name}"] = value.item() if hasattr(value, "item") else value
        return attributes

    @staticmethod
    def traced(func):
        if not can_use_open_telemetry:
            return func

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            tracer = trace.get_tracer(func.__qualname__.split(".")[0])
            with tracer.start_as_current_span(func.__name__, attributes=Tracing._span_attributes(kwargs)):
                return func(*args, **kwargs)

        return wrapper

    @staticmethod
    def get_trace_context() -> dict[str, str]:
        """Identifiers of the current span, echoed into run manifests"""
        if not can_use_open_telemetry:
            return {}

        span_context = trace.get_current_span().get_span_context()
        trace_context = {}
        if span_context.trace_id:
            trace_context["trace_id"] = trace.format_trace_id(span_context.trace_id)
        if span_context.span_id:
            trace_context["span_id"] = trace.format_span_id(span_context.span_id)
        return trace_context
