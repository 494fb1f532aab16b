"""Slot-synchronous model of the three-stage frame pipeline.

Memory holds `regions` regions of `frames_per_region` frame buffers,
addressed in ping-pong groups. Every slot the three stages run in
parallel on consecutive frames: frame N is converted and marked while
frame N-1 is tracked and frame N-2 is displayed. One slot is one frame
period; DDR protocol timing is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

CONVERT_MARK = "CONVERT_MARK"
TRACK = "TRACK"
DISPLAY = "DISPLAY"

_STAGE_ORDER = (CONVERT_MARK, TRACK, DISPLAY)

_DIRECTIONS = ("write", "read", "rw")


@dataclass(frozen=True)
class Channel:
    """One memory stream: name, usage direction, and payload width."""

    name: str
    direction: str
    bits_per_pixel: int

    def __post_init__(self):
        if self.direction not in _DIRECTIONS:
            raise ConfigError(f"channel direction must be one of {_DIRECTIONS}")
        if self.bits_per_pixel < 1:
            raise ConfigError("channel bits_per_pixel must be >= 1")


# Camera input plus the video / ROI-mask / composite streams. Each entry
# is one data stream; "rw" marks streams that are written then read back.
DEFAULT_CHANNELS = (
    Channel("camera_ycbcr", "write", 16),
    Channel("rgb", "rw", 24),
    Channel("roi_mask", "rw", 1),
    Channel("composite", "rw", 24),
)


@dataclass(frozen=True)
class SimConfig:
    width: int = 1920
    height: int = 1080
    fps: float = 60.0
    channels: tuple = DEFAULT_CHANNELS
    regions: int = 2
    frames_per_region: int = 4
    group_size: int = 2
    max_bandwidth: float = 10.0  # Gbit/s
    overhead: float = 1.0
    group_tracking: bool = False

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.fps <= 0:
            raise ConfigError("width/height/fps must be positive")
        if self.regions < 2:
            raise ConfigError("need at least 2 regions for ping-pong addressing")
        if self.frames_per_region < 1:
            raise ConfigError("frames_per_region must be >= 1")
        if self.group_size not in (1, 2):
            raise ConfigError(
                "group_size must be 1 or 2: larger groups put the display "
                "read and the convert write in the same group under the "
                "3-stage schedule"
            )
        if self.frames_per_region % self.group_size != 0:
            raise ConfigError("group_size must divide frames_per_region")
        if self.regions * self.frames_per_region < 3:
            raise ConfigError(
                "total frame buffers must cover the 3-stage pipeline depth"
            )
        if self.max_bandwidth <= 0 or self.overhead <= 0:
            raise ConfigError("max_bandwidth and overhead must be positive")
        object.__setattr__(self, "channels", tuple(self.channels))


@dataclass(frozen=True)
class FrameEvent:
    slot: int
    frame: int
    stage: str
    region: int
    buffer: int


@dataclass(eq=False)
class SimReport:
    events: list[FrameEvent]
    n_frames: int
    total_slots: int
    display_latency: int
    steady_throughput: float
    hazards: int
    per_channel_gbit: dict[str, float]
    total_gbit: float
    max_bandwidth: float
    within_budget: bool

    def to_dict(self) -> dict:
        return {
            "n_frames": self.n_frames,
            "total_slots": self.total_slots,
            "display_latency_slots": self.display_latency,
            "steady_throughput_frames_per_slot": self.steady_throughput,
            "hazards": self.hazards,
            "bandwidth_gbit_per_s": {
                "per_channel": self.per_channel_gbit,
                "total": self.total_gbit,
                "budget": self.max_bandwidth,
                "within_budget": self.within_budget,
            },
            "events": [
                {
                    "slot": e.slot,
                    "frame": e.frame,
                    "stage": e.stage,
                    "region": e.region,
                    "buffer": e.buffer,
                }
                for e in self.events
            ],
        }

    def schedule_table(self) -> str:
        """Human-readable slot-by-stage table."""
        by_slot: dict[int, dict[str, FrameEvent]] = {}
        for e in self.events:
            by_slot.setdefault(e.slot, {})[e.stage] = e
        lines = ["slot  convert_mark  track   display  (frame@region.buffer)"]
        for slot in range(self.total_slots):
            cells = []
            for stage in _STAGE_ORDER:
                e = by_slot.get(slot, {}).get(stage)
                cells.append(f"f{e.frame}@{e.region}.{e.buffer}" if e else "-")
            lines.append(
                f"{slot:>4}  {cells[0]:>12}  {cells[1]:>6}  {cells[2]:>7}"
            )
        return "\n".join(lines)


def _buffer_of(cfg: SimConfig, frame: int) -> tuple[int, int]:
    """Ping-pong placement: consecutive groups alternate regions, and
    buffer slots within a region are recycled round robin."""
    group = frame // cfg.group_size
    region = group % cfg.regions
    ring = (group // cfg.regions) % (cfg.frames_per_region // cfg.group_size)
    buffer = ring * cfg.group_size + frame % cfg.group_size
    return region, buffer


def aggregate_bandwidth(cfg: SimConfig) -> tuple[dict[str, float], float, bool]:
    """Per-channel and total traffic in Gbit/s against the budget."""
    per_channel = {}
    for ch in cfg.channels:
        gbit = cfg.width * cfg.height * ch.bits_per_pixel * cfg.fps * cfg.overhead / 1e9
        per_channel[ch.name] = per_channel.get(ch.name, 0.0) + gbit
    total = sum(per_channel.values())
    return per_channel, total, total <= cfg.max_bandwidth


def _stage_slots(cfg: SimConfig, frame: int) -> tuple[int, int, int]:
    if not cfg.group_tracking:
        return frame, frame + 1, frame + 2
    # Experimental: track a whole group in the slot after it is complete.
    group_end = (frame // cfg.group_size + 1) * cfg.group_size - 1
    return frame, group_end + 1, group_end + 2


def simulate(cfg: SimConfig, n_frames: int) -> SimReport:
    """Run the schedule for n_frames (>= 3) and collect the report."""
    if n_frames < 3:
        raise ValueError(f"n_frames must be >= 3, got {n_frames}")

    events: list[FrameEvent] = []
    convert_slot: dict[int, int] = {}
    display_slot: dict[int, int] = {}
    for frame in range(n_frames):
        region, buffer = _buffer_of(cfg, frame)
        s_convert, s_track, s_display = _stage_slots(cfg, frame)
        convert_slot[frame] = s_convert
        display_slot[frame] = s_display
        events.append(FrameEvent(s_convert, frame, CONVERT_MARK, region, buffer))
        events.append(FrameEvent(s_track, frame, TRACK, region, buffer))
        events.append(FrameEvent(s_display, frame, DISPLAY, region, buffer))
    events.sort(key=lambda e: (e.slot, _STAGE_ORDER.index(e.stage), e.frame))

    # A hazard is a buffer read in the same slot it is written.
    writes: dict[int, set] = {}
    reads: dict[int, set] = {}
    for e in events:
        target = writes if e.stage == CONVERT_MARK else reads
        target.setdefault(e.slot, set()).add((e.region, e.buffer))
    hazards = sum(
        len(writes.get(slot, set()) & reads.get(slot, set())) for slot in writes
    )

    display_slots = sorted(display_slot.values())
    steady = len(display_slots) / (display_slots[-1] - display_slots[0] + 1)
    per_channel, total, within = aggregate_bandwidth(cfg)
    return SimReport(
        events=events,
        n_frames=n_frames,
        total_slots=display_slots[-1] + 1,
        display_latency=display_slot[0] - convert_slot[0],
        steady_throughput=steady,
        hazards=hazards,
        per_channel_gbit=per_channel,
        total_gbit=total,
        max_bandwidth=cfg.max_bandwidth,
        within_budget=within,
    )
