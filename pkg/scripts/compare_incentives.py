#!/usr/bin/env python
"""
Compare per-round client rewards under the equal and Shapley incentive models
on a strongly label-skewed federation, and write the cumulative reward
percentages (relative to equal payouts) to a CSV file.
"""
import argparse
import csv
import os
import statistics
import sys

import django

# Add the project directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

# Set up Django environment
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'wallstreetfeds.settings')
django.setup()

from federation.config import AmmConfig, FederationConfig, ScenarioConfig, SimConfig
from federation.contribution import IncentiveMethod
from federation.events import EventKind
from federation.harness import reward_percentages, run_simulation


def skewed_config(method, seed, rounds=30, n_clients=5, alpha=0.1):
    return SimConfig(
        federation=FederationConfig(
            n_clients=n_clients, samples_per_client=120, classes=4, dim=4,
            dirichlet_alpha=alpha, separation=2.0, local_epochs=1, rounds=rounds,
        ),
        scenario=ScenarioConfig(
            incentive_method=method,
            reward={'type': 'pre_established', 'total': 100_000 * rounds, 'rounds': rounds},
        ),
        amm=AmmConfig(enabled=False),
        seed=seed,
    )


class IncentiveComparison:
    def __init__(self, seed, rounds):
        self.seed = seed
        self.rounds = rounds
        self.results = {}

    def run(self):
        for method in (IncentiveMethod.EQUAL, IncentiveMethod.SHAPLEY):
            print(f"🔍 Running {method.label} incentives...")
            self.results[method.value] = run_simulation(skewed_config(method.value, self.seed, self.rounds))
        return self.results

    def share_spread(self, method):
        """Standard deviation of the client shares in every round."""
        events = self.results[method].events.of_kind(EventKind.CONTRIBUTION_COMPUTED)
        return {event.round: statistics.pstdev(event.payload['shares']) for event in events}

    def write_csv(self, path):
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(['method', 'round', 'client_id', 'reward_percentage'])
            for method, result in self.results.items():
                for round_number, clients in reward_percentages(result).items():
                    for cid, percentage in clients.items():
                        writer.writerow([method, round_number, cid, repr(percentage)])

    def report(self):
        for method in self.results:
            spread = self.share_spread(method)
            volatile = sum(1 for value in spread.values() if value > 0.01)
            final = reward_percentages(self.results[method])[self.rounds]
            print(f"\n{method}: share std > 0.01 in {volatile}/{len(spread)} rounds")
            for cid, percentage in final.items():
                print(f"  {cid}: {percentage:6.1f}% of an equal payout")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--rounds', type=int, default=30)
    parser.add_argument('--out', default='reward_percentages.csv')
    options = parser.parse_args()

    comparison = IncentiveComparison(options.seed, options.rounds)
    comparison.run()
    comparison.report()
    comparison.write_csv(options.out)
    print(f"\n✅ Reward percentages written to {options.out}")


if __name__ == '__main__':
    main()
