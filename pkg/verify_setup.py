"""
Verification script to check the VolStrike setup
"""

import os
import sys
from importlib import import_module

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'configs')

# (import name, minimum major.minor)
REQUIRED = [
    ('numpy', (1, 22)),
    ('scipy', (1, 9)),
    ('pandas', (1, 5)),
    ('pydantic', (2, 0)),
    ('pydantic_settings', (2, 0)),
]


def check_interpreter():
    """Python 3.9 or newer"""
    major, minor = sys.version_info[:2]
    if (major, minor) < (3, 9):
        print(f"❌ Python 3.9+ required, found {major}.{minor}")
        return False
    print(f"✅ Python {major}.{minor}")
    return True


def _major_minor(version):
    parts = version.split('.')[:2]
    return tuple(int(''.join(ch for ch in part if ch.isdigit()) or 0) for part in parts)


def check_packages():
    """Runtime packages are importable and recent enough"""
    ok = True
    for name, minimum in REQUIRED:
        try:
            module = import_module(name)
        except ImportError:
            print(f"❌ {name} missing")
            ok = False
            continue
        version = getattr(module, '__version__', '0.0')
        if _major_minor(version) < minimum:
            print(f"❌ {name} {version} is older than {minimum[0]}.{minimum[1]}")
            ok = False
        else:
            print(f"✅ {name} {version}")
    if not ok:
        print("   Run: pip install -r requirements.txt")
    return ok


def check_settings():
    """Settings load; a .env file is optional"""
    try:
        from config import Settings
        current = Settings()
    except Exception as e:
        print(f"❌ Settings rejected: {e}")
        return False
    truncation = current.omega_max if current.omega_max is not None else 'automatic'
    print(f"✅ Settings loaded (ode_rtol={current.ode_rtol:g}, omega_max={truncation})")
    if not os.path.exists('.env'):
        print("⚠️  No .env file; built-in defaults apply (see .env.example)")
        return None
    return True


def check_configs():
    """Every shipped run configuration parses"""
    from cli import load_config

    names = sorted(name for name in os.listdir(CONFIG_DIR) if name.endswith('.json'))
    bad = []
    for name in names:
        try:
            load_config(os.path.join(CONFIG_DIR, name))
        except Exception as e:
            bad.append(name)
            print(f"❌ {name}: {e}")
    if bad:
        return False
    print(f"✅ {len(names)} run configurations parse")
    return True


def check_pricer():
    """Constant variance: the continuous strike is exactly 100 * sqrt(V)"""
    try:
        from models import JumpSpec, ModelParams, SwapContract
        from pricing import continuous_strike, discrete_strike

        params = ModelParams(
            r=0.02, d=0.02, v0=0.04, lambda0=0.0, kappa_v=10.0, theta_v=0.04,
            sigma_v=1e-8, theta_l=0.0, sigma_l=0.0, rho=0.0,
        )
        contract = SwapContract(t=1.0, n=12)
        discrete = discrete_strike(params, JumpSpec.none(), contract).strike
        continuous = continuous_strike(params, JumpSpec.none(), contract).strike
    except Exception as e:
        print(f"❌ Pricer failed: {type(e).__name__}: {e}")
        return False
    if abs(continuous - 20.0) > 1e-6:
        print(f"❌ Continuous strike {continuous:.8f}, expected 20")
        return False
    print(f"✅ Strikes: discrete {discrete:.4f}, continuous {continuous:.4f}")
    return True


def main():
    print("VolStrike setup check")
    print("-" * 40)

    outcomes = {}
    for title, check in (
        ("Interpreter", check_interpreter),
        ("Packages", check_packages),
        ("Settings", check_settings),
        ("Run configurations", check_configs),
        ("Pricer", check_pricer),
    ):
        print(f"\n[{title}]")
        outcomes[title] = check()
        if title == "Packages" and outcomes[title] is False:
            # nothing below imports without the stack
            break

    failed = [title for title, ok in outcomes.items() if ok is False]
    warned = [title for title, ok in outcomes.items() if ok is None]

    print("\n" + "-" * 40)
    if warned:
        print(f"⚠️  Warnings: {', '.join(warned)}")
    if failed:
        print(f"❌ Failed: {', '.join(failed)}")
        sys.exit(1)
    print("✅ Ready. Try: python cli.py price --config configs/baseline.json")
    sys.exit(0)


if __name__ == "__main__":
    main()
