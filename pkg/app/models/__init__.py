# Models package: every domain type, importable from one place.

from app.models.state import (  # noqa: F401
    CollectiveOp,
    DickeIndex,
    FullState,
    SymmetricState,
)
from app.models.pulse import (  # noqa: F401
    CavityParams,
    EmissionResult,
    PulseProfile,
    TemporalMode,
)
from app.models.cavity import (  # noqa: F401
    AtomPhotonState,
    DetectionConfig,
    TwoCavityOutcome,
)
from app.models.synthesis import (  # noqa: F401
    ProjectiveRoot,
    RotatorSetting,
    SynthesisPlan,
    TargetSuperposition,
)
from app.models.protocol import ClickRecord, ProtocolConfig, RunOutcome  # noqa: F401
