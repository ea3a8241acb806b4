import logging
import os

import structlog

can_use_open_telemetry = False
try:
    import opentelemetry.trace

    can_use_open_telemetry = True
except:
    logging.warning("Unable to import opentelemetry to extend logs", exc_info=True)

LOG_LEVEL_VARIABLE = "TMASIM_LOG_LEVEL"
LOG_FORMAT_VARIABLE = "TMASIM_LOG_FORMAT"
QUIET_LIBRARIES = ("matplotlib", "PIL")


class AppLogging:
    _handler: logging.Handler | None = None

    @staticmethod
    def _add_open_telemetry_spans(_, __, event_dict):
        # See https://www.structlog.org/en/stable/frameworks.html#opentelemetry
        span = opentelemetry.trace.get_current_span()
        if not span.is_recording():
            return event_dict

        ctx = span.get_span_context()
        event_dict["trace_id"] = opentelemetry.trace.format_trace_id(ctx.trace_id)
        event_dict["span_id"] = opentelemetry.trace.format_span_id(ctx.span_id)
        parent = getattr(span, "parent", None)
        if parent:
            event_dict["parent_span_id"] = opentelemetry.trace.format_span_id(parent.span_id)
        return event_dict

    @staticmethod
    def _renderer():
        if os.environ.get(LOG_FORMAT_VARIABLE, "").lower() == "json":
            return structlog.processors.JSONRenderer(sort_keys=True)
        return structlog.dev.ConsoleRenderer()

    @staticmethod
    def _level() -> int:
        name = os.environ.get(LOG_LEVEL_VARIABLE, "INFO").upper()
        level = logging.getLevelName(name)
        return level if isinstance(level, int) else logging.INFO

    @staticmethod
    def configure_logging():
        shared_processors = [
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="%Y-%m-%d %H:%M:%S"),
        ]
        structlog_processors = shared_processors + [structlog.contextvars.merge_contextvars]
        if can_use_open_telemetry:
            structlog_processors.append(AppLogging._add_open_telemetry_spans)
        structlog_processors.append(structlog.stdlib.ProcessorFormatter.wrap_for_formatter)

        structlog.configure(
            processors=structlog_processors,
            logger_factory=structlog.stdlib.LoggerFactory(),
            cache_logger_on_first_use=True,
        )

        formatter = structlog.stdlib.ProcessorFormatter(
            foreign_pre_chain=shared_processors,
            processors=[structlog.stdlib.ProcessorFormatter.remove_processors_meta, AppLogging._renderer()],
        )

        root_logger = logging.getLogger()
        if AppLogging._handler is not None:
            root_logger.removeHandler(AppLogging._handler)
        # stderr; stdout carries the verification table
        AppLogging._handler = logging.StreamHandler()
        AppLogging._handler.setFormatter(formatter)
        root_logger.addHandler(AppLogging._handler)
        root_logger.setLevel(AppLogging._level())
        for library in QUIET_LIBRARIES:
            logging.getLogger(library).setLevel(logging.WARNING)

        structlog.getLogger(AppLogging.__name__).debug("OpenTelemetry", available_in_logs=can_use_open_telemetry)
