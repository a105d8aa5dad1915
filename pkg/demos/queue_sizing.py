"""Size a charging station against a waiting-time target and price it.

A site expecting 32 kWh per hour at peak, 8 kWh per session and 6.4 kW
chargers sees 4 arrivals an hour, each slot serving 0.8 sessions an hour.
"""

from packcover.costing import (
    LandCostModel,
    PoiRecord,
    expected_wait,
    land_cost,
    min_slots,
    queue_from_demand,
    station_cost,
)

q = queue_from_demand(32.0, energy_per_session=8.0, sla_minutes=5)
print(f"arrivals/h {q.arrival_rate:.2f}, service/h per slot {q.service_rate:.2f}, load {q.load:.2f}")

floor = int(q.load) + 1
for n in range(floor, floor + 4):
    print(f"  {n} slots -> mean wait {expected_wait(n, q) * 60:6.2f} min")
print(f"smallest slot count meeting 5 min: {min_slots(q)}")

# land gets dearer close to busy places
pois = [PoiRecord("railway_station", distance_to_site=0.4), PoiRecord("school", distance_to_site=0.8),
        PoiRecord("airport", distance_to_site=3.0)]
unit = land_cost(None, pois, LandCostModel())
slots, cost = station_cost(q, unit)
print(f"land per slot ${unit:,.0f}; station with {slots} slots costs ${cost:,.0f}")
