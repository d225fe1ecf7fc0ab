"""Grid-world navigation with memory-augmented policies."""

from ._core import (
    Action,
    GridMap,
    InfeasibleSpec,
    InputError,
    MapSpec,
    NoPath,
    ObstacleKind,
    ParseError,
    SensorConfig,
    builtin_suite,
    collect_features,
    evaluate,
    expert_rollout,
    generate_map,
    map_difficulty,
    min_enclosing_ball,
    parse_map,
    plan,
    preset_names,
    preset_sensor,
    sense,
    start_position,
    train,
    train_svm,
    vc_estimate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
