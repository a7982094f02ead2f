"""Print the receiver clock as a jittered TimeBase stream is applied, showing slew-limited correction."""

import argparse
import random
import sys

from ginga_drm.adm import TBV_MODULUS, TimeBaseMessage, TimeBaseStatus
from ginga_drm.timebase import TimeBaseConfig, TimeBaseState, timebase_apply, timebase_tick


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--super-frames", type=int, default=60)
    ap.add_argument("--start", type=int, default=5000)
    ap.add_argument("--jitter", type=int, default=2000, help="max |offset| of received TimeBase values")
    ap.add_argument("--every", type=int, default=5, help="super frames between TimeBase messages")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rnd = random.Random(args.seed)
    cfg = TimeBaseConfig()
    state = timebase_apply(TimeBaseState(), TimeBaseMessage(TimeBaseStatus.RUNNING, False, args.start), cfg)
    truth = args.start
    print("super_frame,truth,received,clock,error")
    for sf in range(1, args.super_frames + 1):
        state = timebase_tick(state, cfg)
        truth = (truth + cfg.increment) % TBV_MODULUS
        received = ""
        if sf % args.every == 0:
            offset = rnd.randint(-args.jitter, args.jitter)
            received = (truth + offset) % TBV_MODULUS
            state = timebase_apply(state, TimeBaseMessage(TimeBaseStatus.RUNNING, False, received), cfg)
        print(f"{sf},{truth},{received},{state.current_tbv},{state.current_tbv - truth}")
    print(f"# drift_violations={state.drift_violations}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
