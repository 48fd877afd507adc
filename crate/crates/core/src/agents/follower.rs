use super::comm::{slot_of, MessageDecoder};
use super::{OrderedBestSet, ProtocolError};
use crate::env::Feedback;

/// A follower plays its rotating slot of the set in force and listens for
/// the leader's collisions.
#[derive(Debug, Clone)]
pub struct FollowerState {
    rank: usize,
    num_players: usize,
    num_arms: usize,
    best_set: OrderedBestSet,
    decode: Option<MessageDecoder>,
    pending_set: Option<OrderedBestSet>,
}

impl FollowerState {
    pub fn new(rank: usize, num_players: usize, num_arms: usize) -> Self {
        Self {
            rank,
            num_players,
            num_arms,
            best_set: OrderedBestSet::initial(num_players),
            decode: None,
            pending_set: None,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn best_set(&self) -> &OrderedBestSet {
        &self.best_set
    }

    pub fn pending_set(&self) -> Option<&OrderedBestSet> {
        self.pending_set.as_ref()
    }

    /// Whether a message is being received or awaiting the end of its phase.
    pub fn decoding(&self) -> bool {
        self.decode.is_some()
    }

    pub fn select(&self, t: u64) -> usize {
        self.best_set.arm_at(slot_of(t, self.rank, self.num_players))
    }

    pub fn observe(&mut self, t: u64, feedback: &Feedback) -> Result<(), ProtocolError> {
        let Some(dec) = self.decode.as_mut() else {
            if feedback.collision {
                self.decode = Some(MessageDecoder::open(t, self.rank, self.num_players, self.num_arms));
            }
            return Ok(());
        };
        if let Some(swap) = dec.observe(t, feedback.collision)? {
            let mut next = self.best_set.clone();
            next.apply(swap)?;
            self.pending_set = Some(next);
        }
        if t == dec.phase_end() {
            self.decode = None;
            if let Some(next) = self.pending_set.take() {
                self.best_set = next;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::Swap;

    #[test]
    fn plays_rotating_slot() {
        let mut f = FollowerState::new(2, 3, 6);
        f.best_set = OrderedBestSet::from_slots(vec![4, 1, 6]);
        assert_eq!(f.select(5), 1);
    }

    #[test]
    fn decodes_and_applies_at_phase_end() {
        let mut f = FollowerState::new(2, 3, 5);
        f.best_set = OrderedBestSet::from_slots(vec![1, 2, 3]);
        for t in 90..=117u64 {
            let hit = matches!(t, 100 | 102 | 107);
            let arm = f.select(t);
            f.observe(t, &if hit { Feedback::collided() } else { Feedback::reward(0) }).unwrap();
            if (100..117).contains(&t) {
                // old set stays in force throughout the phase
                assert_eq!(f.best_set().slots(), &[1, 2, 3], "t={t}");
                assert_eq!(arm, f.best_set().arm_at(slot_of(t, 2, 3)));
            }
        }
        assert!(!f.decoding());
        assert_eq!(f.best_set().slots(), &[1, 4, 3]);
        assert_eq!(f.select(118), f.best_set().arm_at(slot_of(118, 2, 3)));
    }

    #[test]
    fn quiet_follower_never_changes() {
        let mut f = FollowerState::new(3, 3, 5);
        for t in 1..1000 {
            f.observe(t, &Feedback::reward(1)).unwrap();
        }
        assert_eq!(f.best_set().slots(), &[1, 2, 3]);
    }

    #[test]
    fn swap_onto_member_is_a_fault() {
        let mut f = FollowerState::new(2, 2, 4);
        // signal, slot 1, arm 2 (already in the set)
        let hits = [1u64, 2, 5];
        let mut result = Ok(());
        for t in 1..=7 {
            let fb = if hits.contains(&t) { Feedback::collided() } else { Feedback::reward(1) };
            result = result.and(f.observe(t, &fb));
        }
        assert_eq!(result, Err(ProtocolError::InvalidSwap(Swap { leaving_slot: 1, entering_arm: 2 })));
    }
}
