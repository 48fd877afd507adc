//! Slot rotation and the collision codec used to announce set changes.
//!
//! A communication phase is `M - 1` sub-blocks of `M + K + 1` rounds, one per
//! follower in rank order. Inside the sub-block addressed to a follower the
//! leader deliberately lands on that follower's arm three times: once to
//! signal, once at offset `leaving_slot` of the next `M` rounds, once at
//! offset `entering_arm` of the final `K` rounds.

use super::{OrderedBestSet, ProtocolError, Swap, Window};

/// Slot played by the player of rank `rank` at exploration round `t`.
pub fn slot_of(t: u64, rank: usize, num_players: usize) -> usize {
    ((t + rank as u64) % num_players as u64) as usize + 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommPlan {
    pub phase_start: u64,
    pub num_players: usize,
    pub num_arms: usize,
    pub swap: Swap,
}

pub fn comm_schedule(
    num_players: usize,
    num_arms: usize,
    phase_start: u64,
    swap: Swap,
) -> Result<CommPlan, ProtocolError> {
    if swap.leaving_slot == 0 || swap.leaving_slot > num_players {
        return Err(ProtocolError::InvalidSwap(swap));
    }
    if swap.entering_arm == 0 || swap.entering_arm > num_arms {
        return Err(ProtocolError::InvalidSwap(swap));
    }
    Ok(CommPlan { phase_start, num_players, num_arms, swap })
}

impl CommPlan {
    pub fn sub_block_len(&self) -> u64 {
        (self.num_players + self.num_arms + 1) as u64
    }

    pub fn len(&self) -> u64 {
        (self.num_players as u64 - 1) * self.sub_block_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Last round of the phase.
    pub fn end(&self) -> u64 {
        self.phase_start + self.len() - 1
    }

    pub fn contains(&self, t: u64) -> bool {
        t >= self.phase_start && t < self.phase_start + self.len()
    }

    /// Rank of the follower the leader must collide with at round `t`.
    pub fn target(&self, t: u64) -> Option<usize> {
        if !self.contains(t) {
            return None;
        }
        let rel = t - self.phase_start;
        let rank = 2 + (rel / self.sub_block_len()) as usize;
        let within = rel % self.sub_block_len() + 1;
        self.collision_offsets().contains(&within).then_some(rank)
    }

    /// 1-based offsets, inside each sub-block, of the leader's collisions.
    pub fn collision_offsets(&self) -> [u64; 3] {
        [
            1,
            1 + self.swap.leaving_slot as u64,
            1 + (self.num_players + self.swap.entering_arm) as u64,
        ]
    }

    /// 1-based offsets within the whole phase at which follower `rank` collides.
    pub fn phase_offsets(&self, rank: usize) -> [u64; 3] {
        let base = (rank as u64 - 2) * self.sub_block_len();
        self.collision_offsets().map(|o| base + o)
    }

    /// The leader's arm at round `t` of the phase, under the set in force.
    pub fn leader_arm(&self, t: u64, set: &OrderedBestSet) -> usize {
        let rank = self.target(t).unwrap_or(1);
        set.arm_at(slot_of(t, rank, self.num_players))
    }
}

/// Follower-side decoder, opened at the signal collision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageDecoder {
    pub signal_time: u64,
    rank: usize,
    num_players: usize,
    num_arms: usize,
    slot_hits: Vec<usize>,
    arm_hits: Vec<usize>,
}

impl MessageDecoder {
    pub fn open(signal_time: u64, rank: usize, num_players: usize, num_arms: usize) -> Self {
        Self { signal_time, rank, num_players, num_arms, slot_hits: Vec::new(), arm_hits: Vec::new() }
    }

    /// Round at which the whole phase ends and the new set takes effect.
    pub fn phase_end(&self) -> u64 {
        let block = (self.num_players + self.num_arms + 1) as u64;
        self.signal_time + (self.num_players - self.rank + 1) as u64 * block - 1
    }

    fn message_end(&self) -> u64 {
        self.signal_time + (self.num_players + self.num_arms) as u64
    }

    /// Feeds round `t`. Returns the decoded swap once the arm window closes.
    pub fn observe(&mut self, t: u64, collision: bool) -> Result<Option<Swap>, ProtocolError> {
        let offset = (t - self.signal_time) as usize;
        let m = self.num_players;
        if collision {
            if (1..=m).contains(&offset) {
                self.slot_hits.push(offset);
            } else if offset > m && offset <= m + self.num_arms {
                self.arm_hits.push(offset - m);
            } else {
                return Err(ProtocolError::UnexpectedCollision { round: t });
            }
        }
        if t == self.message_end() {
            let leaving_slot = single(&self.slot_hits, Window::Slot)?;
            let entering_arm = single(&self.arm_hits, Window::Arm)?;
            return Ok(Some(Swap { leaving_slot, entering_arm }));
        }
        Ok(None)
    }
}

fn single(hits: &[usize], window: Window) -> Result<usize, ProtocolError> {
    match hits {
        [one] => Ok(*one),
        _ => Err(ProtocolError::MalformedMessage { window, collisions: hits.len() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(m: usize, k: usize, start: u64, slot: usize, arm: usize) -> CommPlan {
        comm_schedule(m, k, start, Swap { leaving_slot: slot, entering_arm: arm }).unwrap()
    }

    #[test]
    fn slots_form_a_permutation() {
        assert_eq!(slot_of(2, 1, 3), 1);
        for m in 1..7 {
            for t in 0..50 {
                let mut seen: Vec<usize> = (1..=m).map(|r| slot_of(t, r, m)).collect();
                seen.sort_unstable();
                assert_eq!(seen, (1..=m).collect::<Vec<_>>());
            }
        }
        let at5: Vec<usize> = (1..=3).map(|r| slot_of(5, r, 3)).collect();
        assert_eq!(at5, vec![1, 2, 3]);
    }

    #[test]
    fn phase_length() {
        let p = plan(3, 5, 10, 1, 1);
        assert_eq!(p.len(), 18);
        assert_eq!(p.sub_block_len(), 9);
        assert_eq!(p.end(), 27);
    }

    #[test]
    fn collision_positions() {
        let p = plan(3, 5, 1, 2, 4);
        assert_eq!(p.phase_offsets(2), [1, 3, 8]);
        assert_eq!(p.phase_offsets(3), [10, 12, 17]);
        let hits: Vec<u64> = (1..=18).filter(|&t| p.target(t) == Some(2)).collect();
        assert_eq!(hits, vec![1, 3, 8]);
        let edge = plan(3, 5, 1, 3, 5);
        // last slot-window round and last arm-window round of the sub-block
        assert_eq!(edge.collision_offsets(), [1, 4, 9]);
    }

    #[test]
    fn rejects_out_of_range_swaps() {
        let bad = |s, a| comm_schedule(3, 5, 1, Swap { leaving_slot: s, entering_arm: a });
        assert!(bad(0, 1).is_err());
        assert!(bad(4, 1).is_err());
        assert!(bad(1, 0).is_err());
        assert!(bad(1, 6).is_err());
    }

    #[test]
    fn decoder_example() {
        let mut d = MessageDecoder::open(100, 2, 3, 5);
        assert_eq!(d.phase_end(), 117);
        for t in 101..=108 {
            let got = d.observe(t, t == 102 || t == 107).unwrap();
            assert_eq!(got.is_some(), t == 108);
            if let Some(s) = got {
                assert_eq!(s, Swap { leaving_slot: 2, entering_arm: 4 });
            }
        }
    }

    #[test]
    fn decoder_rejects_malformed() {
        let mut d = MessageDecoder::open(0, 2, 2, 3);
        for t in 1..=5 {
            let r = d.observe(t, t == 1 || t == 2 || t == 4);
            if t == 5 {
                assert!(matches!(r, Err(ProtocolError::MalformedMessage { window: Window::Slot, collisions: 2 })));
            }
        }
        let mut d = MessageDecoder::open(0, 2, 2, 3);
        let mut last = Ok(None);
        for t in 1..=5 {
            last = d.observe(t, t == 1);
        }
        assert!(matches!(last, Err(ProtocolError::MalformedMessage { window: Window::Arm, collisions: 0 })));
        let mut d = MessageDecoder::open(0, 2, 3, 3);
        for t in 1..=6 {
            d.observe(t, t == 1 || t == 5).unwrap();
        }
        // tail of the phase must be quiet
        assert!(matches!(d.observe(7, true), Err(ProtocolError::UnexpectedCollision { round: 7 })));
    }

    #[test]
    fn exhaustive_round_trip() {
        for m in 2..=5 {
            for k in m + 1..=8 {
                for slot in 1..=m {
                    for arm in 1..=k {
                        let p = plan(m, k, 40, slot, arm);
                        for rank in 2..=m {
                            let mut dec: Option<MessageDecoder> = None;
                            let mut decoded = None;
                            for t in p.phase_start..=p.end() {
                                let hit = p.target(t) == Some(rank);
                                match dec.as_mut() {
                                    None if hit => dec = Some(MessageDecoder::open(t, rank, m, k)),
                                    None => {}
                                    Some(d) => {
                                        if let Some(s) = d.observe(t, hit).unwrap() {
                                            decoded = Some(s);
                                        }
                                    }
                                }
                            }
                            let d = dec.expect("signal seen");
                            assert_eq!(d.phase_end(), p.end());
                            assert_eq!(decoded, Some(p.swap));
                        }
                    }
                }
            }
        }
    }
}
