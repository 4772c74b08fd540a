from .combined import CombinedRunner
from .link import InMemoryLink, LinkEndpoint
from .mission import MissionEvent, MissionState, MissionStateMachine
from .onboard import OnboardAgent
from .station import StationAgent, build_knowledge_base

__all__ = [
    "CombinedRunner", "InMemoryLink", "LinkEndpoint",
    "MissionEvent", "MissionState", "MissionStateMachine",
    "OnboardAgent", "StationAgent", "build_knowledge_base",
]
