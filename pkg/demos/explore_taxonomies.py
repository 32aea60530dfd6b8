"""Tour of the two classification schemes
==========================================

Loads the industry and healthcare category tables bundled with the
package and shows how raw codes map onto category labels.
"""

from taxotext import load_healthcare_scheme, load_sic_scheme, normalize_sic
from taxotext.errors import MalformedCode, UnknownCategory

sic = load_sic_scheme()
print(f"industry scheme: {len(sic.categories)} categories")
for label in sic.categories[:5]:
    print(f"  {label.id}  {label.display_name}")
print("  ...")

# a 4-digit code is classified by its 2-digit prefix
for raw in ("0116", "2051", "5812"):
    print(f"{raw} -> {normalize_sic(raw, sic).display_name}")

# codes are strings end to end; leading zeros survive
assert normalize_sic("0116", sic).id == "01"

try:
    normalize_sic("116", sic)
except MalformedCode as exc:
    print(f"rejected short code: {exc}")

try:
    normalize_sic("9910", sic)
except UnknownCategory as exc:
    print(f"rejected unknown prefix: {exc}")

hc = load_healthcare_scheme()
print(f"\nhealthcare scheme: {len(hc.categories)} categories, "
      f"{len(hc.code_map)} known provider codes")
for code in list(hc.code_map)[:3]:
    print(f"  {code} -> {hc.label_for_code(code).display_name}")
