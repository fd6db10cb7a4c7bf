EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_ASSERTION_FAILED = 2

REPORT_PASSED = "passed"
REPORT_FAILED = "failed"

CERTIFICATE_COMPLETE = "complete"
CERTIFICATE_BUDGET_EXCEEDED = "budget_exceeded"
