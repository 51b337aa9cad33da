import os
from dotenv import load_dotenv

load_dotenv()

# Universe Configuration
DEFAULT_N = int(os.getenv("EXPN_N", "2"))
DEFAULT_A = os.getenv("EXPN_A", "even")
DEFAULT_TOPOLOGY = os.getenv("EXPN_TOPOLOGY", "tau_c")

# Window Oracle Configuration
WINDOW_SIZE = int(os.getenv("EXPN_WINDOW", "16"))
WINDOW_PADS = os.getenv("EXPN_PADS", "1,1")

# Run Configuration
DEFAULT_SEED = int(os.getenv("EXPN_SEED", "1729"))
DEFAULT_DEPTH = int(os.getenv("EXPN_DEPTH", "25"))
DEFAULT_SAMPLES = int(os.getenv("EXPN_SAMPLES", "40"))
MAX_SUPPORT = int(os.getenv("EXPN_MAX_SUPPORT", "6"))
REPORTS_DIR = os.getenv("EXPN_REPORTS_DIR", "./data/reports")
CERTIFICATES_DIR = os.getenv("EXPN_CERTIFICATES_DIR", "./data/certificates")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Base axiom budget (exclusion size, descriptors per point, points probed per open)
BASE_MAX_EXCLUSIONS = int(os.getenv("EXPN_BASE_MAX_EXCLUSIONS", "2"))
BASE_MAX_DESCRIPTORS = int(os.getenv("EXPN_BASE_MAX_DESCRIPTORS", "6"))
BASE_MAX_PROBES = int(os.getenv("EXPN_BASE_MAX_PROBES", "24"))

SCHEMA_VERSION = "1.0"
