//! The forwarding pipeline: SOAP admission, encapsulated overlay legs to
//! the beacon and servlet, the perimeter filter, and delivery.

mod pipeline;
mod token;

pub use pipeline::{
    direct_attack_packet, forward_to_delivery, soap_admit, Admission, DeliveryOutcome, DeliveryStatus, EncapHeader,
    Packet, Routing,
};
pub use token::{
    mint_token, verify_token, AuthKey, AuthToken, Credentials, ReplayWindow, TokenVerdict, DEFAULT_REPLAY_WINDOW,
};
