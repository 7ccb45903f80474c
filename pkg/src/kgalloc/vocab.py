"""Well-known identifiers shared by the reasoner, simulator, and miners."""

from .terms import ident

TYPE = ident("type")
LABEL = ident("label")

RESOURCE = ident("Resource")
ROLE = ident("Role")
TASK = ident("Task")
CASE = ident("Case")
ACTIVITY = ident("Activity")

INSTANCE_OF = ident("instanceOf")
PART_OF = ident("partOf")
PERFORMED_BY = ident("performedBy")
CAN_BE_EXECUTED_BY = ident("canBeExecutedBy")
HAS_ROLE = ident("hasRole")
BUSY = ident("busy")

ENABLED_AT = ident("enabledAt")
STARTED_AT = ident("startedAt")
ENDED_AT = ident("endedAt")
DIRECTLY_FOLLOWED_BY = ident("directlyFollowedBy")

HAS_APPLICATION_TYPE = ident("hasApplicationType")
HAS_LOAN_GOAL = ident("hasLoanGoal")
REQUESTED_AMOUNT = ident("requestedAmount")

EXPERT_FOR = ident("expertFor")
SENIORITY = ident("seniority")

EXECUTION_STAT = ident("ExecutionStat")
STAT_OF = ident("statOf")
STAT_ACTIVITY = ident("statActivity")
STAT_COUNT = ident("statCount")
